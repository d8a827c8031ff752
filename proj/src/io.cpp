#include "dsmooth/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "dsmooth/errors.hpp"

namespace dsmooth {

namespace {

struct Token {
  std::string text;
  std::size_t line;
};

std::vector<Token> tokenize(std::istream& in)
{
  std::vector<Token> tokens;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream words(line);
    std::string word;
    while (words >> word)
      tokens.push_back({word, number});
  }
  return tokens;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& message)
{
  std::ostringstream s;
  s << source << ":" << line << ": " << message;
  throw input_error(s.str());
}

double parse_real(const Token& t, const std::string& source)
{
  double value = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (*first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    fail(source, t.line, "expected a real number, got '" + t.text + "'");
  if (!std::isfinite(value))
    fail(source, t.line, "non-finite potential '" + t.text + "'");
  return value;
}

std::uint64_t parse_count(const Token& t, const std::string& source, const char* what)
{
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    fail(source, t.line, std::string("expected a non-negative integer ") + what + ", got '"
                             + t.text + "'");
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

template<typename T>
T parse_field(std::string_view field, std::size_t line)
{
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    std::ostringstream s;
    s << "trace line " << line << ": cannot parse '" << field << "'";
    throw input_error(s.str());
  }
  return value;
}

}

std::string format_real(double x)
{
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

GridModel read_model(std::istream& in, const std::string& source)
{
  const auto tokens = tokenize(in);
  if (tokens.size() < 2 || tokens[0].text != "MRFGRID")
    fail(source, tokens.empty() ? 1 : tokens[0].line, "missing 'MRFGRID 1' header");
  if (tokens[1].text != "1")
    fail(source, tokens[1].line, "unsupported format version '" + tokens[1].text + "'");
  if (tokens.size() < 5)
    fail(source, tokens.back().line, "expected 'H W L' after the header");

  const auto H = parse_count(tokens[2], source, "height");
  const auto W = parse_count(tokens[3], source, "width");
  const auto L = parse_count(tokens[4], source, "label count");
  if (H == 0 || W == 0 || L == 0)
    fail(source, tokens[2].line, "H, W and L must be positive");

  GridModel model(H, W, L);
  const std::size_t expected = model.unary_data().size() + model.pairwise_data().size();
  const std::size_t found = tokens.size() - 5;
  if (found != expected) {
    std::ostringstream s;
    s << "expected " << expected << " potential values for a " << H << "x" << W << " grid with "
      << L << " labels, found " << found;
    fail(source, found > expected ? tokens[5 + expected].line : tokens.back().line, s.str());
  }

  std::size_t k = 5;
  for (double& x : model.unary_data())
    x = parse_real(tokens[k++], source);
  for (double& x : model.pairwise_data())
    x = parse_real(tokens[k++], source);
  return model;
}

GridModel read_model_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw input_error("cannot open model file '" + path + "'");
  return read_model(in, path);
}

void write_model(std::ostream& out, const GridModel& model)
{
  const index L = model.labels();
  out << "MRFGRID 1\n" << model.height() << ' ' << model.width() << ' ' << L << '\n';
  out << "# unary\n";
  for (index v = 0; v < model.node_count(); ++v) {
    const auto row = model.unary(v);
    for (index a = 0; a < L; ++a)
      out << (a ? " " : "") << format_real(row[a]);
    out << '\n';
  }
  for (index e = 0; e < model.edge_count(); ++e) {
    if (e == 0 && model.horizontal_edge_count() > 0)
      out << "# horizontal edges\n";
    if (e == model.horizontal_edge_count())
      out << "# vertical edges\n";
    const auto table = model.pairwise(e);
    for (index a = 0; a < L; ++a) {
      for (index b = 0; b < L; ++b)
        out << (b ? " " : "") << format_real(table[a * L + b]);
      out << '\n';
    }
  }
}

Labeling read_labeling(std::istream& in, const GridModel& model, const std::string& source)
{
  const auto tokens = tokenize(in);
  if (tokens.size() != model.node_count()) {
    std::ostringstream s;
    s << "expected " << model.node_count() << " labels, found " << tokens.size();
    fail(source, tokens.empty() ? 1 : tokens.back().line, s.str());
  }
  Labeling x;
  x.labels.reserve(tokens.size());
  for (const auto& t : tokens) {
    const auto value = parse_count(t, source, "label");
    if (value >= model.labels()) {
      std::ostringstream s;
      s << "label " << value << " out of range [0, " << model.labels() << ")";
      fail(source, t.line, s.str());
    }
    x.labels.push_back(static_cast<label>(value));
  }
  return x;
}

void write_labeling(std::ostream& out, const GridModel& model, const Labeling& x)
{
  for (index r = 0; r < model.height(); ++r) {
    for (index c = 0; c < model.width(); ++c)
      out << (c ? " " : "") << x.labels[model.node(r, c)];
    out << '\n';
  }
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace)
{
  out << trace_header << '\n';
  for (const auto& row : trace) {
    out << row.iter << ',' << row.oracle_calls << ',' << format_real(row.rho) << ','
        << format_real(row.dual_U) << ',' << format_real(row.dual_smooth) << ','
        << format_real(row.primal_lp) << ',' << format_real(row.primal_int) << ','
        << format_real(row.primal_trw) << ',' << format_real(row.gap_abs) << ','
        << format_real(row.gap_rel) << '\n';
  }
}

SolveTrace read_trace_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != trace_header)
    throw input_error("trace CSV: unexpected header");
  SolveTrace trace;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty())
      continue;
    const auto f = split_csv(line);
    if (f.size() != 10) {
      std::ostringstream s;
      s << "trace line " << number << ": expected 10 fields, found " << f.size();
      throw input_error(s.str());
    }
    TraceRow row;
    row.iter = parse_field<std::int64_t>(f[0], number);
    row.oracle_calls = parse_field<std::int64_t>(f[1], number);
    row.rho = parse_field<double>(f[2], number);
    row.dual_U = parse_field<double>(f[3], number);
    row.dual_smooth = parse_field<double>(f[4], number);
    row.primal_lp = parse_field<double>(f[5], number);
    row.primal_int = parse_field<double>(f[6], number);
    row.primal_trw = parse_field<double>(f[7], number);
    row.gap_abs = parse_field<double>(f[8], number);
    row.gap_rel = parse_field<double>(f[9], number);
    trace.push_back(row);
  }
  return trace;
}

}

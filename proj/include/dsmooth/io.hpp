#ifndef DSMOOTH_IO_HPP
#define DSMOOTH_IO_HPP

#include <iosfwd>
#include <string>

#include "dsmooth/driver.hpp"
#include "dsmooth/model.hpp"

namespace dsmooth {

// Text model format:
//
//   MRFGRID 1
//   H W L
//   H*W unary rows of L values (row-major nodes)
//   H*(W-1) horizontal edge tables of L*L values, [a][b] = (left = a, right = b)
//   (H-1)*W vertical edge tables of L*L values,   [a][b] = (top = a, bottom = b)
//
// Tokens are whitespace separated; '#' starts a comment running to the end of the line.
// Errors are input_error with the offending line number.
GridModel read_model(std::istream& in, const std::string& source = "<model>");
GridModel read_model_file(const std::string& path);
void write_model(std::ostream& out, const GridModel& model);

// H lines of W labels.
Labeling read_labeling(std::istream& in, const GridModel& model,
                       const std::string& source = "<labeling>");
void write_labeling(std::ostream& out, const GridModel& model, const Labeling& x);

inline constexpr const char* trace_header =
    "iter,oracle_calls,rho,dual_U,dual_smooth,primal_lp,primal_int,primal_trw,gap_abs,gap_rel";

// CSV with 17 significant digits per real, so parsing gives back identical doubles.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);
SolveTrace read_trace_csv(std::istream& in);

// %.17g
std::string format_real(double x);

}

#endif

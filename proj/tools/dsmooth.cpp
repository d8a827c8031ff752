#include <iostream>

#include "dsmooth/cli.hpp"

int main(int argc, char** argv)
{
  return dsmooth::run_cli(argc, argv, std::cout, std::cerr);
}

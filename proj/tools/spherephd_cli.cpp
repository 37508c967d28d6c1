#include <iostream>

#include "spherephd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spherephd::run_cli(args, std::cout, std::cerr);
}

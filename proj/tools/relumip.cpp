#include <iostream>

#include "relumip/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return relumip::run_cli(args, std::cout, std::cerr);
}

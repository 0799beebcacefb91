#include <iostream>
#include <vector>

#include "fairlens/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return fairlens::run_cli(args, std::cout, std::cerr);
}

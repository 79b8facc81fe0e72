#include <iostream>
#include <string>
#include <vector>

#include "kanlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return kanlab::cli::run(args, std::cout, std::cerr);
}

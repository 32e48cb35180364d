#include <iostream>
#include <string>
#include <vector>

#include "stiction/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return stiction::cli::run(args, std::cout, std::cerr);
}

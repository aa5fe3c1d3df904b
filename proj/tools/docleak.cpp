#include <iostream>
#include <string>
#include <vector>

#include "docleak/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return docleak::run_cli(args, std::cout, std::cerr);
}

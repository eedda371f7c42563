#include <iostream>
#include <string>
#include <vector>

#include "spanlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return spanlab::run_command(args, std::cout, std::cerr);
}

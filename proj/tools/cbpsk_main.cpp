#include <iostream>
#include <string>
#include <vector>

#include "cbpsk/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cbpsk::cli::run(args, std::cout, std::cerr);
}

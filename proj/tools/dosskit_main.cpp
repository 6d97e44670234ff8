#include <iostream>
#include <string>
#include <vector>

#include "dosskit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dosskit::run_cli(args, std::cout, std::cerr);
}

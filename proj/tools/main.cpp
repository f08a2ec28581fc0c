#include <iostream>

#include "textcen/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return textcen::cli_main(args, std::cout, std::cerr);
}

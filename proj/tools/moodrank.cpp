#include <iostream>
#include <string>
#include <vector>

#include "moodrank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return moodrank::cli::run(args, std::cin, std::cout, std::cerr);
}

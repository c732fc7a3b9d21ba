#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  rasch_assess::cli::Style style;
  style.color = std::getenv("RASCH_ASSESS_NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) != 0;
  return rasch_assess::cli::run(args, std::cout, std::cerr, style);
}

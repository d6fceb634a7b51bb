#include <iostream>
#include <string>
#include <vector>

#include "dynathink/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dynathink::run_main(args, std::cout, std::cerr);
}

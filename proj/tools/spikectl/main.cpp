#include <iostream>
#include <string>
#include <vector>

#include "spikectl/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spikectl::run(args, std::cout, std::cerr);
}

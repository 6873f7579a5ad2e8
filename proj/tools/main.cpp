#include <iostream>
#include <string>
#include <vector>

#include "panelfe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return panelfe::run(args, std::cout, std::cerr);
}

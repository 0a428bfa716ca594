#include <iostream>
#include <string>
#include <vector>

#include "noisemix/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return noisemix::dispatch(args, std::cout, std::cerr);
}

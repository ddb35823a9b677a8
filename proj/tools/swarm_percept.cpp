#include <string>
#include <vector>

#include "swarmsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return swarmsim::dispatch(args);
}

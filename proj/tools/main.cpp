#include <string>
#include <vector>

#include "fdmimo/cli.hpp"

int main(int argc, char** argv) {
  return fdmimo::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}

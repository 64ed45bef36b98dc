#include <string>
#include <vector>

#include "xbar/grid.hpp"

int main(int argc, char** argv) {
  return xbar::run_main(std::vector<std::string>(argv + 1, argv + argc));
}

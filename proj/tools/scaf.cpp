#include <iostream>

#include "scaf/cli/cli.hpp"

int main(int argc, char **argv) {
  return scaf::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}

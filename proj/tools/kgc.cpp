#include <iostream>
#include <string>
#include <vector>

#include "kgc/cli/app.hpp"

int main(int argc, char** argv) {
  return kgc::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

#include "retarder/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return retarder::cli::run(argc, argv, std::cout, std::cerr);
}

#include <exception>
#include <iostream>

#include "lowlight/cli.hpp"

int main(int argc, char** argv) {
  try {
    return lowlight::run_cli(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return qkdrates::cli::run_cli(argc, argv, std::cout, std::cerr);
}

#include <iostream>

#include "optlaws/cli.hpp"

int main(int argc, char** argv) {
  return optlaws::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}

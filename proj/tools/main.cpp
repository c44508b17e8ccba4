#include <iostream>

#include "pronk/cli/commands.hpp"

int main(int argc, char** argv) { return pronk::cli_main(argc, argv, std::cout, std::cerr); }

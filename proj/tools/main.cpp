#include <iostream>

#include "emomap_cli.hpp"

int main(int argc, char** argv) { return emomap::cli::run_cli(argc, argv, std::cout, std::cerr); }

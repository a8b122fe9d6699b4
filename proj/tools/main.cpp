#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return chainres::cli::run(argc, argv, std::cout, std::cerr); }

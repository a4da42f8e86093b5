#include <iostream>

#include "remkit/cli.hpp"

int main(int argc, char** argv) { return remkit::cli::run(argc, argv, std::cout, std::cerr); }

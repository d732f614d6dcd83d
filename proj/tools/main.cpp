#include <iostream>

#include "nsclust/cli.hpp"

int main(int argc, char** argv) { return nsclust::run_cli(argc, argv, std::cout, std::cerr); }

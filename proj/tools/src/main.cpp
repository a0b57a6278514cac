#include <iostream>

#include "ssdeconv/cli.hpp"

int main(int argc, char** argv) { return ssdeconv::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "qcd/cli.hpp"

int main(int argc, char** argv) { return qcd::cli::main_entry(argc, argv, std::cout, std::cerr); }

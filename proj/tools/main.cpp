#include <iostream>

#include "sflock/cli.hpp"

int main(int argc, char** argv) { return sflock::cli::main(argc, argv, std::cout, std::cerr); }

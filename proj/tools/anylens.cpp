#include "anylens/cli.hpp"

#include <iostream>

int main( int argc, char** argv ) { return anylens::run_cli( argc, argv, std::cout, std::cerr ); }

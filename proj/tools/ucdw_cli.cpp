#include <iostream>

#include "ucdw/bench.hpp"

int main(int argc, char** argv) { return ucdw::cli_main(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "hhemb/cli.hpp"

int main(int argc, char** argv) { return hhemb::run_cli(argc, argv, std::cout, std::cerr); }

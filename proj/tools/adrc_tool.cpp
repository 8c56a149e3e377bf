#include <iostream>

#include "adrc/cli.hpp"

int main(int argc, char** argv) { return adrc::RunCli(argc, argv, std::cout, std::cerr); }

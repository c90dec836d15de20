#include <iostream>

#include "rsp/cli.h"

int main(int argc, char** argv) { return rsp::run_cli(argc, argv, std::cout, std::cerr); }

#include <iostream>

#include "one2one/app/commands.hpp"

int main(int argc, char** argv) { return one2one::app::run_cli(argc, argv, std::cout, std::cerr); }

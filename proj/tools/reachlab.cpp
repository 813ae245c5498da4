#include <reachlab/cli.hpp>

int main(int argc, char** argv) { return reachlab::cli_main(argc, argv, std::cout, std::cerr); }

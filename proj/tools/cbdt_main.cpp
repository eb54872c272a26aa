#include "cbdt/cli.hpp"

int main(int argc, char** argv) { return cbdt::cli_main(argc, argv); }

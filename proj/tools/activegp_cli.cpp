#include "activegp/cli.hpp"

int main(int argc, char** argv) { return activegp::cli_main(argc, argv); }

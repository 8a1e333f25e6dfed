#include "hypoco/cli.hpp"

int main(int argc, char** argv) { return hypoco::cli::run_cli(argc, argv); }

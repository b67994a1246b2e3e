#include "prsans/cli/cli.hpp"

int main(int argc, char** argv) { return prsans::cli::run_cli(argc, argv); }

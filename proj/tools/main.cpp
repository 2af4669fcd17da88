#include "jumpdiff/cli.hpp"

int main(int argc, char** argv) { return jumpdiff::cli::run_cli(argc, argv); }

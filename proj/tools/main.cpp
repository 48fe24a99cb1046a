#include "cli.hpp"

int main(int argc, char** argv) { return bsec::cli::run_cli(argc, argv); }

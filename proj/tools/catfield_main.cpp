#include "catfield/cli.hpp"

int main(int argc, char** argv) { return catfield::cli::run_cli(argc, argv); }

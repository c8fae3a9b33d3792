#include "antiito/cli.hpp"

int main(int argc, char** argv) { return antiito::cli::run_cli(argc, argv); }

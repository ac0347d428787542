#include "khan/cli.hpp"

int main(int argc, char** argv) { return khan::run_cli(argc, argv); }

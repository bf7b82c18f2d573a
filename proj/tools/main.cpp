#include "jspace/cli.hpp"

int main(int argc, char** argv) { return jspace::run_cli(argc, argv); }

#include "sit/cli_io.hpp"

int main(int argc, char** argv) { return sit::run_cli(argc, argv); }

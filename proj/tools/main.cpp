#include "orthofuse/cli.hpp"

int main(int argc, char** argv) { return orthofuse::cli_main(argc, argv); }

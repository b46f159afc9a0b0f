#include "discovery/cli.hpp"

int main(int argc, char** argv) { return discovery::cli_main(argc, argv); }

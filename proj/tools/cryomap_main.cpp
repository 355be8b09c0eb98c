#include "cryomap/cli.hpp"

int main(int argc, char** argv) { return cryomap::cli_main(argc, argv); }

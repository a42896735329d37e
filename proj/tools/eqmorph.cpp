#include "eqmorph/cli.hpp"

int main(int argc, char** argv) { return eqmorph::cli_main(argc, argv); }

#include "pomg/cli.hpp"

int main(int argc, char** argv) { return pomg::cli_main(argc, argv); }

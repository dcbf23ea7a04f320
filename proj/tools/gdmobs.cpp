#include "gdm/cli.hpp"

int main(int argc, char** argv) { return gdm::cli_main(argc, argv); }

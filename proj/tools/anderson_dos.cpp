#include "anderson/cli.hpp"

int main(int argc, char** argv) { return anderson::run_cli(argc, argv); }

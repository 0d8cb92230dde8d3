#include "coniso/cli.hpp"

int main(int argc, char** argv) { return coniso::run_cli(argc, argv); }

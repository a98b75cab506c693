#include "greenfem/cli.hpp"

int main(int argc, char** argv) { return greenfem::run_command(argc, argv); }

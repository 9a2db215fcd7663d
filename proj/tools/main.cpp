#include "ipcs/cli.hpp"

int main(int argc, char** argv) { return ipcs::run_cli(argc, argv); }

#include "cli.hpp"

int main(int argc, char** argv) { return qprec::run_cli(argc, argv); }

#include "opirl/cli/app.hpp"

int main(int argc, char** argv) { return opirl::run_cli(argc, argv); }

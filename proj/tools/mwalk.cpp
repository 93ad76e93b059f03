#include "mwalk/cli.hpp"

int main(int argc, char** argv) { return mwalk::run_cli(argc, argv); }

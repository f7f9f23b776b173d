#include "modetrans/app.hpp"

int main(int argc, char** argv) { return modetrans::run_cli(argc, argv); }

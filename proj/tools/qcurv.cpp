#include "qcurv/run.hpp"

int main(int argc, char** argv) { return qcurv::cli_main(argc, argv); }

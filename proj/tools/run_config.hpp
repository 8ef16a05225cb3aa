#ifndef DYNKIN_TOOL_RUN_CONFIG_HPP
#define DYNKIN_TOOL_RUN_CONFIG_HPP

#include <string>

namespace dktool {

struct CommonOptions {
    std::string preset = "exp1";
    std::string scheme = "sl";       // sl | nn
    std::string optimizer = "lm";    // lm | lbfgs | br
    int n = 64;                      // time steps
    int l = 64;                      // space cells
    int m = 32;                      // simplex cells
    int hidden = 10;
    unsigned long long seed = 1;
    std::string out_dir = ".";
    int convexify = -1;              // -1 auto
    int clamp = -1;                  // -1 auto
    std::string config_file;         // flat key=value file; flags win
};

struct TableOptions {
    CommonOptions common;
    std::string axis = "t";          // t | x | p
    int coarse = 0;                  // coarsest size along the axis; 0 = preset default
    int rows = 5;
    int fixed = 0;                   // size of the non-refined axes; 0 = finest row
};

struct BoundaryOptions {
    CommonOptions common;
    double p = 0.0;
    double tol = 2e-5;
};

// Each returns a process exit code: 0 ok, 1 solver failure, 2 bad request.
int cmd_run(const CommonOptions& opt);
int cmd_table(const TableOptions& opt);
int cmd_boundary(const BoundaryOptions& opt);

}  // namespace dktool

#endif

/* cc -I include c/example.c ../../target/release/libpathdecomp_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include "pathdecomp.h"

static int product(const double *v, size_t n, void *user, double *out) {
    (void)user;
    double p = 1.0;
    for (size_t i = 0; i < n; i++) p *= v[i];
    *out = p;
    return 0;
}

int main(void) {
    double c0[4] = {40, 10, 10, 40}, c1[4] = {55.397, 14.603, 14.603, 15.397};
    PdTable *t0 = NULL, *t1 = NULL;
    if (pd_table_new(2, c0, &t0) || pd_table_new(2, c1, &t1)) {
        fprintf(stderr, "%s\n", pd_last_error());
        return 1;
    }
    PdHomogamyResult r;
    PdStatus s = pd_decompose_homogamy(t0, t1, PD_SCHEME_PATH_INDEPENDENT, 1e-10, 10000, 0.5, &r);
    if (s != PD_STATUS_OK) {
        fprintf(stderr, "%s\n", pd_last_error());
        return (int)s;
    }
    printf("preference %+.4f availability %+.4f interaction %+.4f total %+.4f\n",
           r.preference, r.availability, r.interaction, r.total);

    double b[2] = {1, 3}, f[2] = {2, 5}, comp[2], inter;
    pd_decompose(2, b, f, PD_GENERIC_SCHEME_SHAPLEY, NULL, product, NULL, comp, &inter, NULL);
    printf("shapley x*y: %g %g\n", comp[0], comp[1]);

    pd_table_free(t0);
    pd_table_free(t1);
    return 0;
}

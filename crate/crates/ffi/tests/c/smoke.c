#include <math.h>
#include <stdio.h>
#include "finsler_ab.h"

int main(void) {
    FabMetric *m = NULL;
    if (fab_metric_new("s3-berger", 1.0, "randers", 0.3, &m) != FAB_STATUS_OK) {
        fprintf(stderr, "%s\n", fab_last_error());
        return 1;
    }
    double x[FAB_DIM] = {0.1, -0.2, 0.3}, y[FAB_DIM] = {0.4, 1.0, -0.3};
    double f = 0.0, ric = 0.0, k = 0.0, u[FAB_DIM] = {0.0, 0.2, 1.0};
    if (fab_finsler(m, x, y, &f) || fab_ricci(m, x, y, &ric) || fab_flag_curvature(m, x, y, u, &k)) return 2;
    fab_metric_free(m);
    if (fabs(ric - 2.0 * f * f) > 1e-8 * f * f || fabs(k - 1.0) > 1e-8) return 3;
    if (fab_metric_new("torus", 1.0, "randers", 0.3, &m) != FAB_STATUS_INVALID_ARGUMENT || fab_last_error() == NULL) return 4;
    printf("ok %s\n", fab_version());
    return 0;
}

#include <stdio.h>
#include <math.h>
#include "spikefilt.h"

int main(void) {
    SfParams *p = NULL;
    if (sf_params_new_default(&p) != SF_STATUS_OK) return 2;
    SfKernels k;
    if (sf_kernels(p, 10.0 * log(2.0), &k) != SF_STATUS_OK) return 3;
    double times[2] = {0.0, 50.0};
    double w[2] = {20.0, 20.0};
    SfPattern *pat = NULL;
    if (sf_pattern_new_single(times, 2, 200.0, &pat) != SF_STATUS_OK) return 4;
    SfSpikeTrain *out = NULL;
    if (sf_simulate(pat, w, 2, p, 0.1, &out) != SF_STATUS_OK) return 5;
    double dw[2];
    if (sf_update(SF_RULE_FILT, pat, out, out, 1.0, p, dw, 2) != SF_STATUS_OK) return 6;
    if (sf_params_new(4, 10, 5, 15, 0, 10, 0.01, 1, NULL) != SF_STATUS_NULL_POINTER) return 7;
    printf("%s %.6f %zu %g\n", sf_version(), k.epsilon, sf_spike_train_len(out), dw[0]);
    sf_spike_train_free(out);
    sf_pattern_free(pat);
    sf_params_free(p);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include "qdiag.h"

static const char *SRC =
    "wire q = quantum 2\n"
    "diagram snake = id(q) * cup(q) ; cap(q) * id(q)\n";

int main(void) {
    qd_program *p = NULL;
    qd_tensor *t = NULL;
    double data[8];
    double lhv = 0.0;
    char msg[128];

    if (qd_program_parse(SRC, &p) != QD_STATUS_OK) return 1;
    if (qd_program_eval(p, "snake", &t) != QD_STATUS_OK) return 2;
    if (qd_tensor_data(t, data, 8) != QD_STATUS_OK) return 3;
    if (data[0] != 1.0 || data[6] != 1.0 || data[2] != 0.0) return 4;
    if (qd_program_eval(p, "nope", &t) != QD_STATUS_UNKNOWN_NAME) return 5;
    qd_last_error_message(msg, sizeof msg);
    qd_tensor_free(t);
    qd_program_free(p);
    if (qd_chsh_lhv_max(&lhv) != QD_STATUS_OK || fabs(lhv - 2.0) > 1e-12) return 6;
    printf("ok: %s\n", msg);
    return 0;
}

#include <stdio.h>
#include <string.h>
#include "qauth.h"

static int check(int cond, const char *what) {
    if (!cond) fprintf(stderr, "FAILED: %s\n", what);
    return cond ? 0 : 1;
}

int main(void) {
    int failures = 0;
    QauthUnitary *pe = qauth_unitary_worked_example();
    double pf = 0.0;
    failures += check(qauth_no_message_optimal(pe, &pf) == QAUTH_STATUS_OK, "no-message call");
    failures += check(pf > 0.8535 && pf < 0.8536, "no-message value");

    int32_t secure = -1;
    char *report = NULL;
    failures += check(qauth_validate(pe, 0, 0, &secure, &report) == QAUTH_STATUS_OK, "validate call");
    failures += check(secure == 1, "worked example secure");
    failures += check(report != NULL && strstr(report, "\"overall_secure\":true") != NULL, "report body");
    qauth_string_free(report);

    QauthUnitary *bad = NULL;
    QauthStatus st = qauth_unitary_from_json("{\"rows\":1,\"cols\":1,\"data\":[[2.0,0.0]]}", 0.0, &bad);
    failures += check(st == QAUTH_STATUS_DIMENSION_MISMATCH, "dimension error code");
    failures += check(bad == NULL, "no handle on failure");
    failures += check(qauth_last_error_message() != NULL, "error message");

    qauth_unitary_free(pe);
    printf("c smoke: %d failures\n", failures);
    return failures;
}

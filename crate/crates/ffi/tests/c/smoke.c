#include <math.h>
#include <stdio.h>
#include <string.h>

#include "associate_id.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,               \
              aid_last_error_message());                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  AidDiagram *d = NULL;
  AidPolicy *p = NULL;
  double meu = 0, value = 0, mean = 0, se = 0;
  size_t errors = 99, warnings = 99;
  char *json = NULL;

  CHECK(aid_mrma_reference(&d) == AID_STATUS_OK);
  CHECK(aid_diagram_validate(d, &errors, &warnings) == AID_STATUS_OK);
  CHECK(errors == 0);
  CHECK(aid_solve(d, &p) == AID_STATUS_OK);
  CHECK(aid_policy_meu(p, &meu) == AID_STATUS_OK);
  CHECK(aid_expected_utility(d, p, &value) == AID_STATUS_OK);
  CHECK(fabs(meu - value) < 1e-9);
  CHECK(aid_evpi(d, "FieldWidth", "Deviation", &value) == AID_STATUS_OK);
  CHECK(value > 0);
  CHECK(aid_simulate(d, p, 20000, 5, &mean, &se) == AID_STATUS_OK);
  CHECK(fabs(mean - meu) <= 4 * se);
  CHECK(aid_tornado_json(d, "Consult=no,Deviation=0", &json) == AID_STATUS_OK);
  CHECK(strstr(json, "\"FieldRocks\"") != NULL);
  aid_string_free(json);

  CHECK(aid_evpi(d, "Nope", "Deviation", &value) == AID_STATUS_MODEL_ERROR);
  CHECK(strstr(aid_last_error_message(), "UNKNOWN_NODE") != NULL);
  CHECK(aid_diagram_from_json("{", &d) == AID_STATUS_PARSE_ERROR);
  CHECK(aid_solve(NULL, &p) == AID_STATUS_NULL_ARGUMENT);

  aid_policy_free(p);
  aid_diagram_free(d);
  printf("c smoke ok\n");
  return 0;
}

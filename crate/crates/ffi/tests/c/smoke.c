#include <math.h>
#include <stdio.h>
#include <string.h>

#include "talbot.h"

static int failures = 0;

#define EXPECT(cond)                                              \
    do {                                                          \
        if (!(cond)) {                                            \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            failures++;                                           \
        }                                                         \
    } while (0)

int main(void) {
    TalbotConfig *cfg = NULL;
    EXPECT(talbot_config_parse("[laser]\npower_W = 5\n", &cfg) == TALBOT_STATUS_OK);

    double phi = 0.0;
    EXPECT(talbot_phi_max(cfg, 130.0, &phi) == TALBOT_STATUS_OK);
    EXPECT(fabs(phi - 3.1985) < 1e-3);

    EXPECT(talbot_config_set(cfg, "velocity.shape=delta") == TALBOT_STATUS_OK);
    TalbotHarmonics *h = NULL;
    EXPECT(talbot_averaged_harmonics(cfg, &h) == TALBOT_STATUS_OK);
    double v = 0.0;
    EXPECT(talbot_harmonics_visibility(h, TALBOT_VISIBILITY_MODE_SINUSOIDAL, &v) == TALBOT_STATUS_OK);
    EXPECT(v > 0.0 && v < 1.0);
    talbot_harmonics_free(h);

    TalbotConfig *bad = NULL;
    EXPECT(talbot_config_parse("[laser]\ncolour = green\n", &bad) == TALBOT_STATUS_CONFIG);
    EXPECT(bad == NULL);
    EXPECT(strstr(talbot_last_error(), "laser.colour") != NULL);

    talbot_config_free(cfg);
    printf("talbot %s: %d failures\n", talbot_version(), failures);
    return failures == 0 ? 0 : 1;
}

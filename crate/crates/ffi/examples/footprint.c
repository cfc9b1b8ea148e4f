/* Print the sample projector's ground footprint and render one frame.
 *
 *   cargo build -p navproj-ffi
 *   cc -I crates/ffi/include crates/ffi/examples/footprint.c \
 *      target/debug/libnavproj_ffi.a -lpthread -ldl -lm -o footprint
 *   ./footprint crates/core/data
 */
#include <stdio.h>
#include <stdlib.h>

#include "navproj.h"

static char *slurp(const char *dir, const char *name) {
    char path[1024];
    snprintf(path, sizeof path, "%s/%s", dir, name);
    FILE *f = fopen(path, "rb");
    if (!f) {
        perror(path);
        exit(2);
    }
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    rewind(f);
    char *buf = malloc((size_t)n + 1);
    size_t got = fread(buf, 1, (size_t)n, f);
    buf[got] = '\0';
    fclose(f);
    return buf;
}

static int check(NpStatus s, const char *what) {
    if (s != NP_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, np_last_error());
        return 1;
    }
    return 0;
}

int main(int argc, char **argv) {
    const char *dir = argc > 1 ? argv[1] : "crates/core/data";
    char *projector = slurp(dir, "projector.toml");
    char *transforms = slurp(dir, "transforms.toml");
    char *path = slurp(dir, "straight_11.json");
    int rc = 1;

    NpProjector *p = NULL;
    NpPipeline *pl = NULL;
    NpFramebuffer *fb = NULL;
    NpPose2 home = {0.0, 0.0, 0.0};
    NpFootprint fp;

    if (check(np_projector_load(projector, transforms, &p), "load")) goto done;
    if (check(np_projector_footprint(p, home, &fp), "footprint")) goto done;
    printf("near %.3f m, far %.3f m, depth %.3f m, area %.3f m^2\n",
           fp.near_width_m, fp.far_width_m, fp.depth_m, fp.area_m2);

    if (check(np_pipeline_new(projector, transforms, NULL, 0.25, 0.2, &pl), "pipeline")) goto done;
    if (check(np_pipeline_render_json(pl, path, &fb), "render")) goto done;
    printf("rendered %ux%u\n", np_framebuffer_width(fb), np_framebuffer_height(fb));
    rc = 0;

done:
    np_framebuffer_free(fb);
    np_pipeline_free(pl);
    np_projector_free(p);
    free(projector);
    free(transforms);
    free(path);
    return rc;
}

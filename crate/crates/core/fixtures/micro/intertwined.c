/* Buffer copy routines. Each interleaves the same element-copy loop with
 * its own bookkeeping, so the loops only line up after isolation. */

void blend_frames(int *dst, int *src, int n)
{
    int i;
    int acc;
    acc = 0;
    for (i = 0; i < n; i++) {
        dst[i] = src[i];
    }
    acc = acc + 2;
}

void mix_channels(int *out, int *inp, int len)
{
    int k;
    int gain;
    int bias;
    gain = 3;
    bias = gain + 1;
    for (k = 0; k < len; k++) {
        out[k] = inp[k];
    }
    gain = gain + bias;
    bias = bias + 1;
}

void shift_window(int *ring, int *feed, int count)
{
    int t;
    int head;
    int tail;
    int mark;
    head = 0;
    tail = head + 4;
    mark = tail;
    for (t = 0; t < count; t++) {
        ring[t] = feed[t];
    }
    head = head + mark;
}

void store_residual(int *res, int *pred, int width)
{
    int w;
    int err;
    int bound_hits;
    err = 0;
    bound_hits = 0;
    for (w = 0; w < width; w++) {
        res[w] = pred[w];
    }
    err = err + 1;
    bound_hits = bound_hits + err;
    err = err + bound_hits;
}

void refresh_cache(int *cache, int *fresh, int total)
{
    int c;
    int hits;
    hits = 1;
    for (c = 0; c < total; c++) {
        cache[c] = fresh[c];
    }
    hits = hits + hits;
    hits = hits + 3;
    hits = hits + 5;
    hits = hits + 7;
}

void apply_palette(int *img, int *pal, int pixels)
{
    int p;
    int depth;
    int stride;
    depth = 8;
    stride = depth + depth;
    for (p = 0; p < pixels; p++) {
        img[p] = pal[p];
    }
    stride = stride + depth;
    depth = depth + 1;
    stride = stride + 2;
    depth = depth + 4;
}

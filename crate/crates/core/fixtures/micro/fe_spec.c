/* Spectral magnitude helpers: wrap-around fill and direct fill. */

void fe_spec_magnitude_loop1(double *data, int32 data_len, int32 fftsize)
{
    complex *in;
    int32 wrap;
    int32 j;
    in = (complex *) calloc(fftsize, sizeof(complex));
    for (wrap = 0; j < data_len; wrap++, j++) {
        in[wrap].r += data[j];
        in[wrap].i += 0.0;
    }
}

void fe_spec_magnitude_loop2(double *data, complex *in, int32 fftsize)
{
    int32 j;
    for (j = 0; j < fftsize; j++) {
        in[j].r = data[j];
        in[j].i = 0.0;
    }
}
